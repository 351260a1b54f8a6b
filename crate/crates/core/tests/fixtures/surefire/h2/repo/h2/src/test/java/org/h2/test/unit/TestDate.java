package org.h2.test.unit;

public class TestDate {
    @Test
    public void testParse() {
        assertEquals("2020-01-01", parse("2020-01-01").toString());
    }
}
