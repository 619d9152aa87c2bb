"""Boosting with latent Gaussian models for non-Gaussian responses."""

from ._lagaboost import Model, ModelFormatError, fit, laplace_nll, simulate

__all__ = ["Model", "ModelFormatError", "fit", "laplace_nll", "simulate"]
