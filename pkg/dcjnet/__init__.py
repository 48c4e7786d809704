"""dcjnet - reversible random walks of distinguished customers in queueing networks."""

__version__ = "1.0.0"
