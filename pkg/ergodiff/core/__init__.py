"""Core utilities shared by the command line"""
