"""Test suite package for the certified Langevin sampler toolkit."""
