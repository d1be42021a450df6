"""
parnncp - dense nonnegative CP decomposition with dimension trees and a
virtual distributed runtime.
"""

__version__ = "0.1.0"
