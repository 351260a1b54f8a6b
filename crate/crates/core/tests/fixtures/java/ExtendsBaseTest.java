package org.example.db;

import java.sql.Connection;
import java.sql.ResultSet;
import java.sql.Statement;

public class ExtendsBaseTest extends AbstractDatabaseTest implements AutoCloseable {

    private Connection conn;

    public ExtendsBaseTest() {
        super();
    }

    @Override
    protected void before() throws Exception {
        conn = getConnection();
    }

    @Test
    public void countsRows() throws Exception {
        Statement st = conn.createStatement();
        ResultSet rs = st.executeQuery("SELECT COUNT(*) FROM t");
        int rows = 0;
        while (rs.next()) {
            rows = rs.getInt(1);
        }
        assertEquals(3, rows);
    }

    @Override
    public void close() throws Exception {
        conn.close();
    }
}
