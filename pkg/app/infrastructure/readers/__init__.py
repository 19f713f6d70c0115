"""Readers - Input adapters"""
