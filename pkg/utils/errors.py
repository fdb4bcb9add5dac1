"""
Exception types shared across the lab
"""


class ShapeError(ValueError):
    """Shape, axis or channel mismatch between tensors"""


class NumericError(ArithmeticError):
    """Non-finite values or an invalid numeric domain (e.g. log of a non-positive entry)"""


class TapeError(RuntimeError):
    """Misuse of a gradient tape"""


class MissingGradientError(RuntimeError):
    """An optimizer step was requested before gradients were populated"""


class CheckpointError(ValueError):
    """A checkpoint document cannot be loaded into the requested network"""


class ConfigError(ValueError):
    """Cross-field configuration problems not caught by model validation"""
