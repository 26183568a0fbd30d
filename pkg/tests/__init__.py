"""Test suite for the Transposable N:M Mask Toolkit."""
