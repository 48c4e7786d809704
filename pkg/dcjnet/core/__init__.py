"""One module per symmetry, generator, stationary, verification and simulation concern."""
