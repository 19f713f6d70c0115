"""Infrastructure - Adapters and External Service Implementations"""
