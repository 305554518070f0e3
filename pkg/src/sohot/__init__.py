"""sohot - Soft Hoeffding trees for drifting data streams"""

__version__ = "0.1.0"
