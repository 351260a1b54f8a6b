package org.h2.test.unit;

public class TestOuter {
    @Test
    public void testOuter() {
        helper();
    }

    public static class Inner {
        @Test
        public void testInner() {
            if (flag) {
                helper();
            } else {
                other();
            }
        }
    }
}
