package org.x;

public class FooTest {
    @Test
    public void foo() {
        assertEquals(2, 1 + 1);
    }
}
