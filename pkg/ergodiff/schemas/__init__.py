"""Pydantic schemas for configuration, reports and manifests"""
