"""MAP symbol detection over finite-memory ISI/AWGN channels."""
__version__ = "0.1.0"
