"""Numerical laboratory for parabolic germs: orbit areas, cohomological equations, moments."""
