"""econkg: knowledge graphs of economic-variable linkages, and KG-guided forecasting."""

__version__ = "0.1.0"
