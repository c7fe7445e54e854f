"""Matrix discrete-continuous bispectral functions and their commuting operators."""
