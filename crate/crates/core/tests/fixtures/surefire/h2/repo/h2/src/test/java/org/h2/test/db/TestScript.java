package org.h2.test.db;

public class TestScript {
    @Test
    public void testScript() throws Exception {
        for (String f : files) {
            run(f);
        }
    }
}
