"""CSV export tests"""
