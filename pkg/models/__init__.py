"""Models package for the parallel interpolation search tree"""
