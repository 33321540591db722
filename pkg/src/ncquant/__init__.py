"""Quantization of classical dynamical systems from their equations of motion."""
