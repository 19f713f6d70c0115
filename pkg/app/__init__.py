"""Engagement analytics application"""
