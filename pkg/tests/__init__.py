"""Tests for Proxlab."""
