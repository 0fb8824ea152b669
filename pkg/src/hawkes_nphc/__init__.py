"""
hawkes-nphc - non-parametric estimation of Hawkes causality (the kernel
integral matrix G) by matching integrated cumulants.
"""

from loguru import logger

__version__ = "0.1.0"

# library stays silent until an application enables it
logger.disable("hawkes_nphc")
