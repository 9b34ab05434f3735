"""Optimal isotropic material design for 2-D bodies in the L^p cost setting."""
