"""Stern identification and signature scheme laboratory."""
