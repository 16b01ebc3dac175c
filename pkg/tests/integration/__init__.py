"""Integration tests for facepulse."""