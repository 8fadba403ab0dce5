"""Propagation engine tests"""
