"""Domain layer - schemas, errors, ports, services and use cases"""
