"""Reaction model tests"""
