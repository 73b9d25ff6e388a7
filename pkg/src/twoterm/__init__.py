"""Point counts of y^q - y = x^(q^b+1) - x^(q^a+1) by enumeration and in closed form."""

__version__ = "0.1.0"
