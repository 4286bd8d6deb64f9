"""
errors.py
====================================
Exception hierarchy. DataError maps to exit status 1, ConfigError to 2.
"""

class CoherenceError(Exception):
    """Base class for all toolkit errors"""

class DataError(CoherenceError, ValueError):
    """Input data cannot be used"""

class ConfigError(CoherenceError, ValueError):
    """Invalid configuration or parameters"""

class CorpusError(DataError):
    pass

class GridError(DataError):
    pass

class FeatureError(DataError):
    pass

class ModelError(DataError):
    pass

class TaskError(DataError):
    pass
