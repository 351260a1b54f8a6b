package org.h2.test.unit;

public class TestGone {
}
