"""fiboptic: finite, exhaustively checkable bidirectional-transformation structures."""

__version__ = "0.1.0"
