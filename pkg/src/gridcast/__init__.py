"""gridcast: multi-horizon household power demand forecasting toolkit."""

__version__ = "0.1.0"
