"""Blind, channel-agnostic equalization trained against an adversarial discriminator."""
__version__ = "0.1.0"
