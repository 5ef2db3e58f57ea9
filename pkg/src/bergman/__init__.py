"""Confluence checks for algebra and strand-category presentations."""
