"""PCA + mutual-information feature weighting + Modified Cuckoo Search tuned
feature-weighted SVM for binary clinical classification."""
from ._accel import backend_name

__version__ = "0.1.0"
__all__ = ["backend_name", "__version__"]
