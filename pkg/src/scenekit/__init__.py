"""scenekit: toy-scale multi-camera driving-scene generation and editing."""

__version__ = "0.1.0"
