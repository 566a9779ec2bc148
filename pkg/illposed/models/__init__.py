"""Dataclass domain types shared across the toolkit."""
