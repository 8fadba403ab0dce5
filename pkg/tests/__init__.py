"""Test suite for cissrp"""
