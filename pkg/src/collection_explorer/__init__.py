"""Specimen-collection explorer: viewport map service and a grounded
conversational agent over an occurrence dataset."""

__version__ = "0.1.0"
