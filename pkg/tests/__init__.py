"""Tests for pathgrad."""
