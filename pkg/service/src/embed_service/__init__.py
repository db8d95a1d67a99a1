from .app import create_app
from .encoder import DIMENSION, MAX_SEQUENCE_LENGTH, DeterministicEncoder

__all__ = ["DIMENSION", "MAX_SEQUENCE_LENGTH", "DeterministicEncoder", "create_app"]
