"""Desk-scale monocular 3D object detection toolkit."""

__version__ = "0.1.0"
