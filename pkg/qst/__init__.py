"""Protected quantum state transfer along Krawtchouk spin chains."""

__version__ = "0.1.0"
