import org.junit.Test;

public class LiteralsTest {

    @Test
    public void parsesLiterals() {
        long hex = 0xFF_FFL;
        int bin = 0b1010;
        double exp = 1.5e-3;
        float f = 2.0f;
        char tab = '\t';
        String quoted = "say \"hi\"";
        Object none = null;
        boolean yes = true;
        String block = """
            multi
            line
            """;
        assertNotNull(block);
        assertTrue(hex > bin && exp < f && tab != 'a' && quoted.length() > 0 && none == null && yes);
    }
}
