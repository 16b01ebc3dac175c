"""Unit tests for facepulse."""