"""Hybrid numerical-asymptotic boundary elements for penetrable convex polygons."""
