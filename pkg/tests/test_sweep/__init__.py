"""Sweep and study tests"""
