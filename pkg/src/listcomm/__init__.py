"""List encoding/decoding codes over discrete memoryless channels."""

__version__ = "0.1.0"
