"""Presentation - CLI and HTTP Routes/Adapters"""
