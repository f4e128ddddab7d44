"""Leader-follower consensus control with distributed GP learning."""

__version__ = "0.1.0"
