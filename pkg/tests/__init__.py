"""Tests for the illposed package."""
