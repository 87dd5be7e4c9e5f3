"""Bundled experiment configs, loadable by name: ``warpends curvature -c hyperbolic``"""
