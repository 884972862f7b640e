"""Subcommands of the ergodiff command line"""
