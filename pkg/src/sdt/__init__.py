"""Streaming data-string transducers, and the single-pass list programs that compile to them."""
