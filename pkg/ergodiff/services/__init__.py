"""Numerical services"""
