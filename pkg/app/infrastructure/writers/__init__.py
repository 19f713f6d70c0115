"""Writers - Output adapters"""
