"""Test suite for sohot"""
