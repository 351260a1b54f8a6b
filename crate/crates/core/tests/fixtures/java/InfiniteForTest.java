import org.junit.Test;

public class InfiniteForTest {

    @Test(timeout = 1000)
    public void breaksOut() {
        int n = 0;
        for (;;) {
            n++;
            if (n > 100) {
                break;
            }
        }
        for (int i = 0, j = 10; i < j; i++, j--) {
            n += j - i;
        }
        assertTrue(n > 100);
    }
}
