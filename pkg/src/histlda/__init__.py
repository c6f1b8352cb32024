"""Histogram latent Dirichlet allocation."""
