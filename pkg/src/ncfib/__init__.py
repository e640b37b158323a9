"""Noncommutative Hopf fibration S^7_theta -> S^4_theta: exact algebra, calculi,
connections and Chern characters."""

__version__ = "0.1.0"
