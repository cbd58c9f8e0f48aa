"""raywave - Infrastructure Layer"""
