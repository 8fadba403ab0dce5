"""Coherence, yield and statistics tests"""
