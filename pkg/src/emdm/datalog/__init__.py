"""Deductive subsystem: Datalog over catalog object sets."""
