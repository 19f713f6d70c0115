"""Domain Services - Pure pipeline stages"""
