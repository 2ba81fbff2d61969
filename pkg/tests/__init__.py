"""
Tests for the WCV toolkit

Run with: pytest
Coverage: pytest --cov=wcv --cov-report=html
"""
