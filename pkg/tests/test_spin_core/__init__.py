"""Spin operator and Hamiltonian tests"""
