"""
Fiducial Splat Tests Package
"""

__version__ = '0.1.0'