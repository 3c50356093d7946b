"""Tensor calculus on the dual 1-jet bundle."""
