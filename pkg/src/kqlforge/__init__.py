"""kqlforge: natural-language-to-KQL translation pipeline and evaluation harness."""

__version__ = "0.1.0"
