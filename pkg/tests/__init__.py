"""Test package for facepulse."""