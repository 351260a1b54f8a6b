import org.junit.Test;

public class BracelessIfTest {

    @Test
    public void noBraces() {
        int a = 3;
        if (a > 2) a = 2;
        if (a < 0) a = 0; else a++;
        while (a < 10) a += 3;
        for (int i = 0; i < 2; i++) a--;
        if (a == 1) ;
        assertEquals(10, a);
    }
}
