"""Energies, phase diagram, slicing bounds and lattice minimizers for the
l1 double-bubble problem with interaction intensity ``eta``."""
