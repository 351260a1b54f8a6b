package org.y;

public class BazTest {
    @Test
    public void baz() {
        if (ready()) {
            go();
        }
    }
}
