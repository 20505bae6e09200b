"""Kuratowski set mappings, exact countable metric spaces, and colorings of
(n+2)-sets that realize every color on copies of the rationals."""

__version__ = "0.1.0"
